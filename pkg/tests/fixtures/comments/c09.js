var a = 1, b = 2, c = 3, x = 1, img = ee.Image(0), s = 'z';
var q = a / b / c; // divisions, not regexes
// standalone comment 77
var d = x++ / 2; /* after postfix */

var url = 'http://example.com/a//b'; // trailing note
var s = "/* not a comment */"; /* real one */
print(typeof /x/.source); // regex after keyword
Map.addLayer(img, {min: 0, max: 1 /* vis */}, 'NDVI // name');
// standalone comment 37
if (x) { /* empty */ } else { print('a/*b*/c'); }
if (x) { /* empty */ } else { print('a/*b*/c'); }
